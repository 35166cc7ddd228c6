from django.urls import path, include
from rest_framework.routers import DefaultRouter
from .views import RunRecordViewSet

router = DefaultRouter()
router.register(r'runs', RunRecordViewSet, basename='run')


urlpatterns = [
    path('', include(router.urls)),
]
